fn main() {
    std::process::exit(stiffexp::cli::run(std::env::args_os()));
}
