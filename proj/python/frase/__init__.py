"""Frame detection, LCQ3 dataset construction, and SPARQL evaluation.

The heavy lifting lives in the compiled ``_frase`` extension; this package
re-exports its public surface.
"""

from ._frase import (  # noqa: F401
    Frame,
    FrameElement,
    FrameInventory,
    FraseInputError,
    FraseServiceError,
    FraseUsageError,
    HashFoldProvider,
    MockSparqlEndpoint,
    VectorIndex,
    __version__,
    answer_accuracy,
    answer_f1,
    bleu,
    build_frame_index,
    build_prompt,
    classify_query_form,
    corpus_bleu,
    detect_frames,
    evaluate_run,
    execute_query,
    extract_template,
    extract_uris,
    lexical_baseline_annotate,
    load_frame_inventory,
    load_lcq2,
    make_original_split,
    make_unknown_template_split,
    query_length,
    render_frame_text,
    select_variables,
    split_stats,
    validate_annotation,
)
