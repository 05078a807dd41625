fn main() {
    std::process::exit(bilab_cli::run(std::env::args_os()));
}
