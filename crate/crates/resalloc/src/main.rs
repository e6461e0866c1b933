use std::process::exit;

fn main() {
    exit(resalloc::cli_main(std::env::args_os()));
}
