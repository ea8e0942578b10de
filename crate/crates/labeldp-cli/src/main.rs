fn main() {
    labeldp_cli::run()
}
