fn main() {
    std::process::exit(hesuite_cli::run(std::env::args_os()));
}
