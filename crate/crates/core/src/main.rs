fn main() -> std::process::ExitCode {
    sepnet::expcli::cli::main()
}
