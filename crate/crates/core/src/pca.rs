//! Principal component analysis of a solution set.
//!
//! Rows are configurations, columns are vertices. The covariance uses the
//! population normalization `(1/N)·ṼᵀṼ`, and eigenpairs come from a cyclic
//! Jacobi solver.
//!
//! Labels are integers, so centering and covariance are computed exactly
//! from `N·x − S` (with `S` the column sum) and divided only at the end.
//! Complementary classes therefore get bit-identical covariance matrices.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::constants::MagicPair;
use crate::error::{Error, Result};
use crate::search::{Configuration, SolutionSet};

/// Default relative tolerance of [`eigendecompose`].
pub const DEFAULT_TOLERANCE: f64 = 1e-14;

/// Sweep cap of the Jacobi solver.
pub const MAX_SWEEPS: usize = 100;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a != 0.0 {
                    for j in 0..other.cols {
                        out[(i, j)] += a * other[(k, j)];
                    }
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise difference; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `N` configurations of one pair as an `N × n` integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionMatrix {
    pub pair: MagicPair,
    n: usize,
    rows: Vec<Configuration>,
}

impl SolutionMatrix {
    /// Fails unless every row is a permutation of `1..=n`.
    pub fn new(pair: MagicPair, n: usize, rows: Vec<Configuration>) -> Result<Self> {
        for r in &rows {
            if r.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: r.len() });
            }
            if !r.is_permutation() {
                return Err(Error::NotPermutation(n));
            }
        }
        Ok(Self { pair, n, rows })
    }

    pub fn from_solutions(s: &SolutionSet) -> Result<Self> {
        Self::new(s.pair, s.n, s.solutions()?.to_vec())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn configurations(&self) -> &[Configuration] {
        &self.rows
    }

    pub fn to_matrix(&self) -> Matrix {
        let data = self.rows.iter().flat_map(|r| r.labels().iter().map(|&l| l as f64)).collect();
        Matrix { rows: self.rows.len(), cols: self.n, data }
    }

    fn column_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.n];
        for r in &self.rows {
            for (s, &l) in sums.iter_mut().zip(r.labels()) {
                *s += l as i64;
            }
        }
        sums
    }

    /// Mean-centered matrix and the mean vector.
    pub fn center(&self) -> Result<(Matrix, Vec<f64>)> {
        if self.rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let big_n = self.rows.len() as i64;
        let sums = self.column_sums();
        let mean = sums.iter().map(|&s| s as f64 / big_n as f64).collect();
        let data = self
            .rows
            .iter()
            .flat_map(|r| {
                r.labels().iter().zip(&sums).map(move |(&l, &s)| (big_n * l as i64 - s) as f64 / big_n as f64)
            })
            .collect();
        Ok((Matrix { rows: self.rows.len(), cols: self.n, data }, mean))
    }

    /// `(1/N)·ṼᵀṼ`, accumulated in exact integer arithmetic.
    pub fn covariance(&self) -> Result<Matrix> {
        if self.rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let n = self.n;
        let big_n = self.rows.len() as i128;
        let sums = self.column_sums();
        let mut acc = vec![0i128; n * n];
        let mut d = vec![0i128; n];
        for r in &self.rows {
            for ((x, &l), &s) in d.iter_mut().zip(r.labels()).zip(&sums) {
                *x = big_n * l as i128 - s as i128;
            }
            for i in 0..n {
                for j in i..n {
                    acc[i * n + j] += d[i] * d[j];
                }
            }
        }
        let scale = (big_n * big_n * big_n) as f64;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = acc[i * n + j] as f64 / scale;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }
}

/// Mean-centers a real matrix.
pub fn center(m: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    if m.rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mean: Vec<f64> = (0..m.cols).map(|j| m.column(j).iter().sum::<f64>() / m.rows as f64).collect();
    let mut c = m.clone();
    for i in 0..m.rows {
        for j in 0..m.cols {
            c[(i, j)] -= mean[j];
        }
    }
    Ok((c, mean))
}

/// Population covariance `(1/N)·XᵀX` of an already centered matrix.
pub fn covariance(centered: &Matrix) -> Matrix {
    let n = centered.cols;
    let mut m = Matrix::zeros(n, n);
    if centered.rows == 0 {
        return m;
    }
    for r in 0..centered.rows {
        let row = centered.row(r);
        for i in 0..n {
            for j in i..n {
                m[(i, j)] += row[i] * row[j];
            }
        }
    }
    let scale = centered.rows as f64;
    for i in 0..n {
        for j in i..n {
            let v = m[(i, j)] / scale;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Eigenvalues in descending order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`; its largest-magnitude entry is
    /// positive (first such entry on ties).
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl Eigen {
    /// `Σ λ_i u_i u_iᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut m = Matrix::zeros(n, n);
        for (l, u) in self.values.iter().zip(&self.vectors) {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += l * u[i] * u[j];
                }
            }
        }
        m
    }
}

fn off_diagonal(a: &Matrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `tolerance` times the Frobenius norm of the input.
pub fn eigendecompose(m: &Matrix, tolerance: f64) -> Result<Eigen> {
    let n = m.rows;
    assert_eq!(n, m.cols, "square matrix required");
    let norm = m.frobenius();
    let asymmetry = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asymmetry > tolerance.max(f64::EPSILON) * norm.max(1.0) {
        return Err(Error::NotSymmetric(asymmetry));
    }
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let mut sweeps = 0;
    while off_diagonal(&a) >= tolerance * norm && norm > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut u = v.column(i);
            let lead = (0..n).fold(0, |best, j| if u[j].abs() > u[best].abs() { j } else { best });
            if u[lead] < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            u
        })
        .collect();
    Ok(Eigen { values, vectors, sweeps })
}

/// Coordinates of the centered rows along the top `k` components.
pub fn project(centered: &Matrix, eigen: &Eigen, k: usize) -> Result<Matrix> {
    let n = centered.cols;
    if k == 0 || k > n || k > eigen.vectors.len() {
        return Err(Error::DimensionOutOfRange { k, n });
    }
    let mut w = Matrix::zeros(n, k);
    for (j, u) in eigen.vectors[..k].iter().enumerate() {
        for i in 0..n {
            w[(i, j)] = u[i];
        }
    }
    Ok(centered.mul(&w))
}

/// Everything the PCA of one class produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub pair: MagicPair,
    pub n: usize,
    pub samples: usize,
    pub mean: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    /// `samples × k`; empty for an empty class.
    pub coordinates: Matrix,
    pub k: usize,
}

impl ProjectionResult {
    /// Eigenvalues divided by their sum; all zero if the sum is zero.
    pub fn explained_variance(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues.iter().map(|l| if total > 0.0 { l / total } else { 0.0 }).collect()
    }
}

/// Centers, decomposes and projects onto `k` components. An empty class
/// yields a result with no samples and no spectrum.
pub fn pca(m: &SolutionMatrix, k: usize) -> Result<ProjectionResult> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::DimensionOutOfRange { k, n });
    }
    if m.is_empty() {
        return Ok(ProjectionResult {
            pair: m.pair,
            n,
            samples: 0,
            mean: Vec::new(),
            eigenvalues: Vec::new(),
            components: Vec::new(),
            coordinates: Matrix::zeros(0, k),
            k,
        });
    }
    let (centered, mean) = m.center()?;
    let eigen = eigendecompose(&m.covariance()?, DEFAULT_TOLERANCE)?;
    let coordinates = project(&centered, &eigen, k)?;
    Ok(ProjectionResult {
        pair: m.pair,
        n,
        samples: m.len(),
        mean,
        eigenvalues: eigen.values,
        components: eigen.vectors,
        coordinates,
        k,
    })
}

/// Formats with 12 significant digits, `%g` style.
pub fn format_float(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..DIGITS).contains(&exp) {
        trim(format!("{:.*}", (DIGITS - 1 - exp) as usize, x))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

/// `x` rounded to the 12 digits [`format_float`] prints.
pub fn round_float(x: f64) -> f64 {
    format_float(x).parse().unwrap_or(x)
}

fn column_names(k: usize) -> Vec<String> {
    match k {
        1..=3 => ["x", "y", "z"][..k].iter().map(|s| s.to_string()).collect(),
        _ => (1..=k).map(|i| format!("pc{i}")).collect(),
    }
}

/// The coordinates as CSV, header first.
pub fn projection_csv(p: &ProjectionResult) -> String {
    let mut out = column_names(p.k).join(",");
    out.push('\n');
    for i in 0..p.coordinates.rows() {
        let row: Vec<String> = p.coordinates.row(i).iter().map(|&x| format_float(x)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Serialize)]
struct Spectrum {
    sp: i64,
    sh: i64,
    n: usize,
    samples: usize,
    k: usize,
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    explained_variance_ratio: Vec<f64>,
}

/// The spectrum sidecar as JSON, floats rounded to 12 significant digits.
pub fn spectrum_json(p: &ProjectionResult) -> String {
    let round = |v: &[f64]| v.iter().map(|&x| round_float(x)).collect();
    let s = Spectrum {
        sp: p.pair.sp,
        sh: p.pair.sh,
        n: p.n,
        samples: p.samples,
        k: p.k,
        mean: round(&p.mean),
        eigenvalues: round(&p.eigenvalues),
        explained_variance_ratio: round(&p.explained_variance()),
    };
    serde_json::to_string_pretty(&s).expect("plain data serializes")
}

/// Writes `<stem>.csv` and `<stem>.spectrum.json`; returns both paths.
pub fn export_projection(p: &ProjectionResult, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv = stem.with_extension("csv");
    let json = PathBuf::from(format!("{}.spectrum.json", stem.display()));
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&csv, projection_csv(p))?;
    fs::write(&json, spectrum_json(p) + "\n")?;
    Ok((csv, json))
}
