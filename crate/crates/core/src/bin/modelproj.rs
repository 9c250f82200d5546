fn main() {
    std::process::exit(modelproj::cli::main_with_args(std::env::args_os()));
}
