fn main() {
    std::process::exit(voxfact_cli::run(std::env::args_os()));
}
