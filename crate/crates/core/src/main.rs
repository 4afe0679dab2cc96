fn main() {
    std::process::exit(equidyn::cli::main_with_args(std::env::args_os()));
}
