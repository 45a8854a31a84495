fn main() {
    let code = tsreduce::bench::cli::cli_main(std::env::args_os());
    std::process::exit(code);
}
