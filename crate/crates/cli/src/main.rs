fn main() {
    std::process::exit(kinex_cli::run(std::env::args_os()));
}
