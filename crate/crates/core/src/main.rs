fn main() {
    std::process::exit(pixel_pass::cli::run(std::env::args_os()));
}
