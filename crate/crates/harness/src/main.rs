fn main() {
    std::process::exit(lfd_harness::cli::run(std::env::args_os()));
}
