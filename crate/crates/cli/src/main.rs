fn main() {
    std::process::exit(slag_toric_cli::cli::main_with_args(std::env::args_os()));
}
