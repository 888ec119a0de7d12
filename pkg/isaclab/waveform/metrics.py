import numpy as np


def comm_metrics(H, W, sigma2_comm):
    """Per-user SINR and achievable sum-rate of a linear precoder

    Parameters
    ----------
    H : numpy.ndarray
        User channels h_{n,k}, shape (N, K, N_t).
    W : Precoder or numpy.ndarray
        Beamformers of shape (N, N_t, N_s); column k serves user k for k < K.
    sigma2_comm : float
        Receiver noise power at the users.

    Returns
    -------
    dict
        'sinr' : (N, K) array, 'sum_rate' : float [bit/s/Hz].

    Notes
    -----
    SINR_{n,k} = |h^H w_k|^2 / (sum_{j != k} |h^H w_j|^2 + sigma2), where the
    sum runs over all N_s streams so sensing streams count as interference.

    """
    if not sigma2_comm > 0:
        raise ValueError(f'communication noise power must be positive, got {sigma2_comm}')
    W = getattr(W, 'W', W)
    H = np.asarray(H)
    K = H.shape[1]
    G = np.abs(np.einsum('nkt,nts->nks', H.conj(), W)) ** 2
    signal = G[:, np.arange(K), np.arange(K)]
    sinr = signal / (G.sum(axis=2) - signal + sigma2_comm)
    return {'sinr': sinr, 'sum_rate': float(np.sum(np.log2(1.0 + sinr)))}


def slp_safety_margin(h, x, s, omega):
    """Distance of a noise-free PSK receive point to its decision boundary

    Notes
    -----
    delta = Re{h^H x s*} sin(pi/Omega) - |Im{h^H x s*}| cos(pi/Omega)

    """
    if omega < 2:
        raise ValueError(f'PSK order must be >= 2, got {omega}')
    r = np.vdot(h, x) * np.conj(s)
    return float(r.real * np.sin(np.pi / omega) - abs(r.imag) * np.cos(np.pi / omega))


def safety_margins(H, X, S, omega):
    """Safety margins for every user and symbol

    Parameters
    ----------
    H : numpy.ndarray
        (K, N_t) user channels of one subcarrier.
    X : numpy.ndarray
        (L, N_t) transmit vectors.
    S : numpy.ndarray
        (L, K) intended PSK symbols.

    Returns
    -------
    numpy.ndarray
        (L, K) margins.

    """
    r = np.einsum('kt,lt->lk', np.conj(H), X) * np.conj(S)
    return r.real * np.sin(np.pi / omega) - np.abs(r.imag) * np.cos(np.pi / omega)
