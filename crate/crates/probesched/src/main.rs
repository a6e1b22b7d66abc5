fn main() {
    std::process::exit(probesched::cli::run(std::env::args_os()));
}
