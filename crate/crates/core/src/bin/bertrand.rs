fn main() {
    std::process::exit(bertrand::cli::run(std::env::args_os()));
}
