fn main() {
    std::process::exit(darboux_susy::cli::main_with_args(std::env::args_os()));
}
