fn main() {
    std::process::exit(ibismeet::run(std::env::args_os()));
}
