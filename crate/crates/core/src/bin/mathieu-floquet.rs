fn main() {
    std::process::exit(mathieu_floquet::cli::run_cli(std::env::args_os()));
}
