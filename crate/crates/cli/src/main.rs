fn main() {
    std::process::exit(blocksplit_cli::run(std::env::args_os()));
}
