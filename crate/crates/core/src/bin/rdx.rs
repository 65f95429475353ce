fn main() {
    std::process::exit(rdx_gauss::cli::main_with_args(std::env::args_os()));
}
