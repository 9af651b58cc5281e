namespace roughsheet {
}
