fn main() {
    std::process::exit(combrec_cli::run(std::env::args_os()));
}
