fn main() {
    std::process::exit(ionfab::cli::run(std::env::args_os()));
}
