import gzip, html, json, sys, ftfy, regex as re
sys.path.insert(0, 'oc')
from open_clip.tokenizer import bytes_to_unicode, get_pairs

class Ref:
    # OpenAI CLIP simple_tokenizer conventions (special tokens <|startoftext|>/<|endoftext|>)
    def __init__(self):
        self.byte_encoder = bytes_to_unicode()
        merges = gzip.open('oc/open_clip/bpe_simple_vocab_16e6.txt.gz').read().decode('utf-8').split('\n')
        merges = merges[1:49152-256-2+1]
        merges = [tuple(m.split()) for m in merges]
        vocab = list(bytes_to_unicode().values())
        vocab = vocab + [v+'</w>' for v in vocab]
        for m in merges: vocab.append(''.join(m))
        vocab.extend(['<|startoftext|>', '<|endoftext|>'])
        self.encoder = dict(zip(vocab, range(len(vocab))))
        self.bpe_ranks = dict(zip(merges, range(len(merges))))
        self.cache = {'<|startoftext|>': '<|startoftext|>', '<|endoftext|>': '<|endoftext|>'}
        self.pat = re.compile(r"""<\|startoftext\|>|<\|endoftext\|>|'s|'t|'re|'ve|'m|'ll|'d|[\p{L}]+|[\p{N}]|[^\s\p{L}\p{N}]+""", re.IGNORECASE)
    def bpe(self, token):
        if token in self.cache: return self.cache[token]
        word = tuple(token[:-1]) + (token[-1] + '</w>',)
        pairs = get_pairs(word)
        if not pairs: return token + '</w>'
        while True:
            bigram = min(pairs, key=lambda p: self.bpe_ranks.get(p, float('inf')))
            if bigram not in self.bpe_ranks: break
            first, second = bigram
            new_word = []; i = 0
            while i < len(word):
                try:
                    j = word.index(first, i); new_word.extend(word[i:j]); i = j
                except ValueError:
                    new_word.extend(word[i:]); break
                if word[i] == first and i < len(word)-1 and word[i+1] == second:
                    new_word.append(first+second); i += 2
                else:
                    new_word.append(word[i]); i += 1
            word = tuple(new_word)
            if len(word) == 1: break
            pairs = get_pairs(word)
        word = ' '.join(word); self.cache[token] = word; return word
    def encode(self, text):
        text = ftfy.fix_text(text); text = html.unescape(html.unescape(text)).strip()
        text = ' '.join(text.split()).strip().lower()
        out = []
        for tok in re.findall(self.pat, text):
            tok = ''.join(self.byte_encoder[b] for b in tok.encode('utf-8'))
            out.extend(self.encoder[t] for t in self.bpe(tok).split(' '))
        return out

corpus = [
 "", "hello world", "HELLO", "hello", "The River Nore at Kilkenny",
 "Phahurat Road in Phra Nakhon, Bangkok",
 "Phahurat or Pahurat sometimes described as Thailand's Little India, is a market neighbourhood in Bangkok.",
 "A constitutional court is a high court that deals primarily with constitutional law.",
 "Davenport is a city in and the county seat of Scott County, Iowa, United States.",
 "Credit Island Park on the Mississippi River, Davenport, Iowa",
 "Caption: The River Nore at Kilkenny\n\nNote: The River Nore is one of the Three Sisters.",
 "SummaryStart: The summary of the text is as follows. <SummaryEnd>",
 "The current tokens are 300 tokens.",
 "Please generate a summary so that there are 180 tokens.",
 "I'm sure they'll say we've done it, but you'd know it's true and they're right.",
 "DON'T SHOUT, IT'S RUDE",
 "  leading and   trailing   whitespace  ",
 "tabs\tand\nnewlines\r\nmixed",
 "numbers 1234567890 and 3.14159 and 1,000,000",
 "1999-2024",
 "email@example.com https://en.wikipedia.org/wiki/Phahurat",
 "C++ & Rust: a (brief) comparison [2024] {draft} <beta>",
 "!!! ??? ... --- ___ *** ###",
 "café naïve résumé coöperate façade",
 "Straße Größe Ärger Übung Öl",
 "Zürich Genève Besançon São Paulo",
 "日本語のテキスト",
 "東京タワーは東京都港区芝公園にある電波塔です。",
 "中华人民共和国",
 "한국어 문장입니다",
 "Привет, мир! Москва — столица России.",
 "Ελληνικά γράμματα και Σίσυφος",
 "مرحبا بالعالم",
 "שלום עולם",
 "สวัสดีครับ กรุงเทพมหานคร",
 "हिन्दी भाषा",
 "emoji 🎉🚀 party 👍🏽",
 "“Curly double quotes” and ‘curly single quotes’",
 "the ﬁrst ﬂight ﬀ",
 "ＦＵＬＬＷＩＤＴＨ　ｔｅｘｔ １２３",
 "Fish &amp; Chips &lt;b&gt; &quot;quoted&quot; &#39;apos&#39;",
 "double escaped &amp;amp; entity",
 "Pérez&eacute; and &copy; 2024",
 "a",
 "I",
 "x y z",
 "aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa",
 "supercalifragilisticexpialidocious",
 "antidisestablishmentarianism pneumonoultramicroscopicsilicovolcanoconiosis",
 "<|endoftext|>",
 "text before <|startoftext|> and after",
 "hello<|endoftext|>world",
 "it's its it’s",
 "rock'n'roll o'clock",
 "'s 't 're 've 'm 'll 'd",
 "The quick brown fox jumps over the lazy dog.",
 "A photograph of the Eiffel Tower at night, illuminated with golden lights.",
 "Kilkenny Castle, a castle in Kilkenny, Ireland, built in 1195 to control a fording-point of the River Nore.",
 "St. Mary's Cathedral, Kilkenny — Roman Catholic cathedral",
 "The Wat Phra Kaew (Temple of the Emerald Buddha) is regarded as the most sacred Buddhist temple in Thailand.",
 "Mount Fuji (富士山, Fujisan) is an active stratovolcano on Japan's Honshu island.",
 "Neuschwanstein Castle (German: Schloss Neuschwanstein) is a 19th-century historicist palace.",
 "İstanbul ve Çanakkale",
 "ǅungla ĳsberg",
 "mixedCASE camelCase PascalCase snake_case kebab-case",
 "x86_64-unknown-linux-gnu",
 "v1.2.3-rc.4+build.5",
 "$100.00 €50 £20 ¥1000 ₹500",
 "50% off!!! 2x faster (really)",
 "temperature: 25°C, 77°F",
 "α β γ δ ε — math: ∑ ∫ √ ∞ ≠ ≤ ≥",
 "©®™ § ¶ † ‡",
 "zero​width space",
 "soft­hyphen",
 "non breaking space",
 "ideographic　space",
 "bell\u0007char and \u001b[31mred\u001b[0m",
 "combining é accent",
 "The 2,500 instances in WiT-Cub average 3.02 entities.",
 "Avg. token length 26.48",
 "FLUX.1-dev stable-diffusion-3.5-large IF-I-L-v1.0 dreamlike-photoreal-2.0",
 "Llama-3.1-8B-Instruct Qwen2.5-72B-Instruct gpt-4o-mini-2024-07-18",
 "Tr(Σ_r + Σ_g − 2(Σ_r Σ_g)^{1/2})",
 "exp(E[KL(p(y|x) || p(y))])",
 "🇯🇵🇮🇪 flags 👨‍👩‍👧 family",
 "...and then... silence.",
 "\"double\" 'single' `backtick`",
 "hyphen-ated words and en–dash and em—dash",
 "A" * 3 + "b" * 3 + "C" * 3,
 "ThisIsAVeryLongCamelCaseIdentifierWithoutSpacesThatShouldSplitIntoManyBpeTokens",
 "Übersee-Museum Bremen ist ein Museum für Natur-, Völker- und Handelskunde.",
 "Le musée du Louvre est le plus grand musée d'art du monde.",
 "El Museo del Prado es uno de los más importantes del mundo.",
 "Ho Chi Minh City (Thành phố Hồ Chí Minh)",
 "Kraków, Łódź, Gdańsk, Wrocław",
 "Reykjavík Þingvellir Æsir Ø",
 "a\u0000b",
 "trailing punctuation?!",
 "12 34 56 78 90",
 "Phahurat or Pahurat sometimes described as Thailand's Little India, is a market neighbourhood in Bangkok. It is in Wang Burapha Phirom subdistrict of Phra Nakhon district. The area is home to a large community of Indians, many of whom are Sikhs, and many shops sell textiles and garments. " * 3,
]
assert len(corpus) == 100, len(corpus)
r = Ref()
with open('/root/crate/crates/core/tests/fixtures/clip_reference.jsonl','w',encoding='utf-8') as f:
    for t in corpus:
        f.write(json.dumps({"text": t, "ids": r.encode(t)}, ensure_ascii=False) + '\n')
print(r.encode("hello world"), len(r.encode(corpus[-1])))
