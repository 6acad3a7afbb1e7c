"""Normalización de comentarios: case folding → limpieza → tokenización → stopwords → stemming."""
from __future__ import annotations
import re
from typing import FrozenSet, List, Optional, Sequence, Tuple

from src.domain.schemas import PreprocessConfig

_URL_PREFIXES = ("http://", "https://", "www.")
_NON_LETTER = re.compile(r"[^a-z]+")
_SPACES = re.compile(r"\s+")


# ---------- Etapas ----------
def case_fold(text: str) -> str:
    return text.lower()


def cleanse(text: str, config: PreprocessConfig) -> str:
    tokens = text.split()
    if config.strip_urls:
        tokens = [t for t in tokens if not t.startswith(_URL_PREFIXES)]
    if config.strip_mentions:
        tokens = [t for t in tokens if not t.startswith("@")]
    # todo lo que no sea a-z (dígitos, puntuación, emoji) pasa a ser espacio
    text = _NON_LETTER.sub(" ", " ".join(tokens))
    return _SPACES.sub(" ", text).strip()


def tokenize(text: str, config: PreprocessConfig) -> List[str]:
    return [t for t in text.split() if len(t) >= config.min_token_len]


def remove_stopwords(tokens: Sequence[str], config: PreprocessConfig) -> List[str]:
    return [t for t in tokens if t not in config.stopwords]


# ---------- Stemming ----------
# Etapas 1-3: sufijos; el orden dentro de cada tupla es el de prueba (más largo primero)
_PARTICLES = ("lah", "kah", "pun")
_POSSESSIVES = ("nya", "ku", "mu")
_DERIVATIONAL_SUFFIXES = ("kan", "an", "i")
# Etapa 4: prefijos en orden de coincidencia más larga
_PREFIXES = (
    "meng", "meny", "peny",
    "ber", "ter", "per", "mem", "men",
    "di", "ke", "se", "pe", "me",
)
# Recodificación: meny-/peny- + vocal → s + resto
_RECODED = {"meny": "s", "peny": "s"}

_MIN_SUFFIX_REMAINDER = 3
_MIN_PREFIX_REMAINDER = 4
_MAX_PREFIX_STRIPS = 2


def _strip_suffix(word: str, suffixes: Tuple[str, ...]) -> Optional[str]:
    for suffix in suffixes:
        if word.endswith(suffix) and len(word) - len(suffix) >= _MIN_SUFFIX_REMAINDER:
            return word[: -len(suffix)]
        if word.endswith(suffix):
            # solo se prueba el sufijo más largo que coincide
            return None
    return None


def _strip_one_prefix(word: str, removed_an: bool) -> Optional[str]:
    for prefix in _PREFIXES:
        if not word.startswith(prefix):
            continue
        if prefix == "ke" and not removed_an:
            # ke- solo como parte del confijo ke-...-an
            return None
        rest = _RECODED.get(prefix, "") + word[len(prefix):]
        if len(rest) >= _MIN_PREFIX_REMAINDER:
            return rest
        return None
    return None


def _strip_prefixes(word: str, removed_an: bool, trail: List[str]) -> str:
    for _ in range(_MAX_PREFIX_STRIPS):
        stripped = _strip_one_prefix(word, removed_an)
        if stripped is None:
            break
        word = stripped
        trail.append(word)
    return word


def _stem_trail(token: str) -> List[str]:
    """Formas intermedias en el orden en que se producen; la última es el stem."""
    trail = [token]
    word = token
    for suffixes in (_PARTICLES, _POSSESSIVES):
        stripped = _strip_suffix(word, suffixes)
        if stripped is not None:
            word = stripped
            trail.append(word)

    before_derivational = word
    stripped = _strip_suffix(word, _DERIVATIONAL_SUFFIXES)
    removed = before_derivational[len(stripped):] if stripped is not None else ""
    removed_an = removed == "an"
    if stripped is not None:
        word = stripped
        trail.append(word)

    after_prefix = _strip_prefixes(word, removed_an, trail)
    if after_prefix == word and removed == "i":
        # -i sin prefijo posterior: se reintenta con la -i como parte de la raíz (dibeli -> beli)
        retry: List[str] = []
        retried = _strip_prefixes(before_derivational, False, retry)
        if retried != before_derivational:
            trail.pop()
            trail.extend(retry)
    return trail


def stem_token(token: str, root_words: Optional[FrozenSet[str]] = None) -> str:
    """Stemmer por reglas de afijos, sin diccionario por defecto.

    Con diccionario de raíces: se devuelve la primera forma (incluida la original)
    que esté en el diccionario, o el token original si ninguna lo está.
    """
    if root_words is not None and token in root_words:
        return token
    trail = _stem_trail(token)
    if root_words is None:
        return trail[-1]
    for form in trail[1:]:
        if form in root_words:
            return form
    return token


# ---------- Pipeline ----------
def preprocess_document(text: str, config: PreprocessConfig) -> List[str]:
    if config.lowercase:
        text = case_fold(text)
    tokens = remove_stopwords(tokenize(cleanse(text, config), config), config)
    if config.enable_stemming:
        tokens = [stem_token(t, config.root_words) for t in tokens]
        tokens = [t for t in tokens if len(t) >= config.min_token_len]
    return tokens


def preprocess_corpus_texts(texts: Sequence[str], config: PreprocessConfig) -> List[List[str]]:
    return [preprocess_document(t, config) for t in texts]
