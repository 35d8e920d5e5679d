fn main() {
    std::process::exit(redcal::cli::run(std::env::args_os()));
}
