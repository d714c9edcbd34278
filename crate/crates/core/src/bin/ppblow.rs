fn main() {
    std::process::exit(ppblow::cli::run(std::env::args_os()));
}
