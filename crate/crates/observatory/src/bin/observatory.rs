fn main() {
    std::process::exit(observatory::api::cli::run(std::env::args_os()));
}
