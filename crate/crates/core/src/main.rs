fn main() {
    std::process::exit(gaugelens::cli::run(std::env::args_os()));
}
