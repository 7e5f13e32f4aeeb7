fn main() {
    std::process::exit(gaboredge_cli::run(std::env::args_os()));
}
