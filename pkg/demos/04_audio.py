"""Audio windows: a pure tone against white noise.

Both recordings are 48 kHz stereo, decimated by 100 (box average) and cut
into 5000-sample windows with 50% overlap, so every window is a point in
R^10000.  Windows of a tone differ only in phase and sit on a closed loop in
a plane; noise windows are spread in every direction.

Run:  python3 demos/04_audio.py [out_dir]
"""
import sys
from pathlib import Path

from kprofile import profile_data
from kprofile.ingest import AudioWindowConfig, load_audio_windows, write_wav
from kprofile.synthetic import tone, white_noise

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)
cfg = AudioWindowConfig(decimation=100, window_len=5000, channels=2)
seconds = (cfg.window_len + 23 * cfg.step) * cfg.decimation / 48_000  # 24 windows

for name, signal in [("tone", tone(seconds)), ("noise", white_noise(seconds, seed=0))]:
    path = out / f"{name}.wav"
    write_wav(path, 48_000, signal)
    data = load_audio_windows(path, cfg)
    prof = profile_data(data, range(1, 11))
    print(f"{name}: {data.N} windows in R^{data.n}, good dimension {prof.good_dimension()}")
    print("  kappa:", " ".join("%.3f" % k for k in prof.kappas))
