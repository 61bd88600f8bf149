fn main() {
    std::process::exit(sfo_core::cli::run(std::env::args_os()));
}
