fn main() {
    std::process::exit(puviz::cli::run(std::env::args_os()));
}
