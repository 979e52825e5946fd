//! Binary entry point: all behavior lives in [`kil::cli`].

fn main() {
    std::process::exit(kil::cli::run(std::env::args_os()));
}
