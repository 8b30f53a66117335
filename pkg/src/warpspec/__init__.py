"""Energy-function diagnostics for eigen-solutions on warped-product manifold ends."""
