fn main() -> std::process::ExitCode {
    semifactual::cli::main()
}
