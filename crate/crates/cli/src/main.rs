fn main() {
    std::process::exit(emtk_cli::run(std::env::args_os()));
}
