fn main() {
    std::process::exit(somogsa::cli::main_with_args(std::env::args_os()));
}
