fn main() {
    std::process::exit(asq_core::cli::main_with_args(std::env::args_os()));
}
