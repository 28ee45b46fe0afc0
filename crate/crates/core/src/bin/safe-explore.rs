fn main() {
    std::process::exit(safe_explore::harness::cli_main(std::env::args_os()));
}
