fn main() {
    std::process::exit(emaudit::cli::run(std::env::args_os()));
}
