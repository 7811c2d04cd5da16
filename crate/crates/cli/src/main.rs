fn main() {
    std::process::exit(quadfreq_cli::run(std::env::args_os()));
}
