fn main() {
    std::process::exit(fullerene_magic::cli::run(std::env::args_os()));
}
