"""AMANDA: a multilingual diabetes-care conversational agent at desk scale.

Subsystems: audio/spectrogram DSP (amanda.dsp), a small autograd core
(amanda.nn), the bi-directionally regularized sequence-to-spectrogram TTS
model (amanda.tts), intent classification (amanda.nlu), the fail-safe
dialogue engine and FAQ knowledge base (amanda.dialogue, amanda.kb),
MOS/SUS survey scoring (amanda.evaluation), and an HTTP service plus
operator CLI (amanda.service, amanda.cli).
"""

__version__ = "0.1.0"
