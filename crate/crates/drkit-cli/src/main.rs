fn main() {
    // populated by the verification harness below
}
