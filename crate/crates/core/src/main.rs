fn main() {
    std::process::exit(lexalign::cli::run(std::env::args_os()));
}
