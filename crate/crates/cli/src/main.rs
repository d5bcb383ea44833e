fn main() {
    std::process::exit(dirac_inverse_cli::run(std::env::args_os()));
}
