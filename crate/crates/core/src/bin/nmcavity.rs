fn main() {
    std::process::exit(nmcavity::cli::main_with_args(std::env::args_os()));
}
