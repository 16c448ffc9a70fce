fn main() {
    std::process::exit(mplkit::cli::run(std::env::args_os()));
}
