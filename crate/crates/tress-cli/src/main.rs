fn main() {
    std::process::exit(tress_cli::run(std::env::args_os()));
}
