fn main() {
    std::process::exit(semilinear_cli::run(std::env::args_os()));
}
