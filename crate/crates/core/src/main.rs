fn main() {
    std::process::exit(bscope::cli_io::cli_main(std::env::args_os()));
}
