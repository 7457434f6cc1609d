fn main() {
    std::process::exit(preserverlab::harness::run_cli(std::env::args_os()));
}
