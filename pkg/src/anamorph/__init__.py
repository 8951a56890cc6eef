"""Anamorphic encryption and secret sharing of quantum states, simulated
with dense density matrices."""
from .errors import AnamorphError
from .linalg import apply_hermitian_function, check_density, hermitian_eig, matrix_norms, partial_trace, schur_psd_check, tensor_product
from .qops import PauliString, PermSpec, QotpKey, dephase_control, pad_embed, pad_unembed, pauli_matrix, permutation_unitary, qotp_decrypt, qotp_encrypt, qotp_key_average
from .scheme import (
    AnamorphicKey,
    Ciphertext,
    SecurityConfig,
    dcm_exact,
    dom_decrypt,
    encrypt_dilation,
    encrypt_direct,
    encrypt_original,
    eoc_extract,
    keygen,
    select_eta,
    tpds,
)

__version__ = "0.1.0"
