fn main() {
    std::process::exit(decoupling_cli::run(std::env::args_os()));
}
