fn main() {
    std::process::exit(mre::cli::run(std::env::args_os()));
}
