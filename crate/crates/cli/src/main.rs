fn main() {
    std::process::exit(subdiag::run_command(std::env::args_os()));
}
