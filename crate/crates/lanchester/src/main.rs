fn main() {
    std::process::exit(lanchester::cli::main_with_args(std::env::args_os()));
}
