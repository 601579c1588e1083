fn main() {
    std::process::exit(gridcascade::cli::run(std::env::args_os()));
}
