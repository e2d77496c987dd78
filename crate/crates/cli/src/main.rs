fn main() {
    std::process::exit(planegen_cli::main_with_args(std::env::args_os()));
}
