fn main() {
    std::process::exit(kinetic_exit::harness::cli_main(std::env::args_os()));
}
