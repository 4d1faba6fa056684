fn main() {
    std::process::exit(prefid::cli::main_with_args(std::env::args_os()));
}
