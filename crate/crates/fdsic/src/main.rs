fn main() {
    std::process::exit(fdsic::harness::cli_main(std::env::args_os()));
}
