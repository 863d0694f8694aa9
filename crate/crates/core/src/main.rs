fn main() {
    std::process::exit(threshold4d::cli::run(std::env::args_os()));
}
