fn main() {
    std::process::exit(segfilter_cli::run(std::env::args_os()));
}
