fn main() {
    std::process::exit(cohtomo_cli::run(std::env::args_os()));
}
