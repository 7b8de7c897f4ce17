fn main() {
    std::process::exit(defectivity::cli::run_cli(std::env::args_os()));
}
