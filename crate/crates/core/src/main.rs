fn main() {
    std::process::exit(omage::cli::main_with_args(std::env::args_os()));
}
