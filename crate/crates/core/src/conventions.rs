//! Factor conventions, stated once.
//!
//! All sampled data is invariant along the fiber coordinates, so holomorphic
//! and anti-holomorphic derivatives coincide and reduce to half x-derivatives:
//!
//! * `∂_j = ∂̄_j = (1/2) ∂/∂x^j` on y-invariant data.
//! * Curvature matrix: `F_jk = (1/4) ∂²φ/∂x^j ∂x^k` (a quarter x-Hessian of
//!   the potential `φ = -log h(ē, e)`).
//! * Endomorphism: `K = g^{-1} F`; its eigenvalues `λ_i` are the generalized
//!   eigenvalues of the pencil `(F, g)`.
//! * Angle: `θ = Σ_i arctan λ_i`, the real-valued lift; the complex weight is
//!   `ζ = Π_i (1 + i λ_i)` with `ζ/|ζ| = e^{iθ}` and `|ζ|² = det(I + K²)`.
//! * Induced metric: `η = g + F g^{-1} F`.
//! * Mean curvature one-form: `H_j = (1/2) ∂θ/∂x^j`.
//! * Weighted Laplacian: `Δ_η f = (1/4) Σ η^{jk} ∂²f/∂x^j∂x^k`.
//! * Christoffels: `Γ^k_{ij} = (1/2) Σ_l g^{kl} ∂g_{jl}/∂x^i`.
//! * Riemannian lengths: the chart metric assigns `2 g_jk` to both base and
//!   fiber coordinate pairs, so fiber balls have volume
//!   `sqrt(2^n det g) · Vol_euclid(B(r'))` and straight x-displacements have
//!   length `sqrt(2 Δxᵀ g Δx)`.
//! * Position section centered at `x₀`: vector part `2(x^k - x₀^k)`, form
//!   part `(1/2) ∂φ/∂x^k`; hence `|𝒫|² = 4 Δxᵀ g Δx + (1/4) ∇φᵀ g^{-1} ∇φ`,
//!   which for a centered quadratic potential equals `4 xᵀ η x` exactly.
//!
//! The quarter-Hessian convention is pinned by the identity test that couples
//! the divergence of a position section to the chart dimension (see the
//! frames identity suite): with any other factor that identity fails.
