fn main() {
    std::process::exit(stit_lab::cli::main_with_args(std::env::args_os()));
}
