fn main() {
    std::process::exit(hsi_lrmr::cli::run(std::env::args_os()));
}
