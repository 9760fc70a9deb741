fn main() {
    std::process::exit(reupload::cli::run(std::env::args_os()));
}
