fn main() {
    std::process::exit(afdm_core::cli::main_with_args(std::env::args_os()));
}
