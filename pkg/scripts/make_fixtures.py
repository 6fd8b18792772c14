"""Regenerate the curated mini data fixtures under tests/data/.

The fixtures are a small, hand-checked slice of the real databases: a
CHISE-layout decomposition table, UniHan-layout kCantonese readings, and
UniHan-layout variant links. Small enough to ship, real enough to exercise
every code path (digraph onsets, syllabic nasals, ternary operators,
entity components, variant pairs, characters missing from the table).
"""

from pathlib import Path

RULES = [
    # Fig-style nested cluster
    ("仕", "⿰亻士"), ("亻", "人"), ("士", "⿱十一"), ("十", "⿻一丨"),
    ("蒸", "⿱艹烝"), ("烝", "⿱丞火"), ("丞", "⿱氶一"),
    # person series
    ("位", "⿰亻立"), ("住", "⿰亻主"), ("仙", "⿰亻山"), ("伴", "⿰亻半"),
    ("佳", "⿰亻圭"), ("做", "⿰亻故"), ("信", "⿰亻言"), ("他", "⿰亻也"),
    ("仲", "⿰亻中"), ("仔", "⿰亻子"), ("假", "⿰亻叚"), ("伯", "⿰亻白"),
    ("化", "⿰亻七"), ("从", "⿰人人"), ("众", "⿱人⿰人人"),
    # water series
    ("河", "⿰氵可"), ("湖", "⿰氵胡"), ("海", "⿰氵每"), ("江", "⿰氵工"),
    ("洋", "⿰氵羊"), ("清", "⿰氵青"), ("波", "⿰氵皮"), ("池", "⿰氵也"),
    ("汁", "⿰氵十"), ("沐", "⿰氵木"), ("洗", "⿰氵先"), ("泳", "⿰氵永"),
    ("沙", "⿰氵少"), ("油", "⿰氵由"), ("沖", "⿰氵中"), ("治", "⿰氵台"),
    ("淋", "⿰氵林"), ("酒", "⿰氵酉"), ("泡", "⿰氵包"), ("淼", "⿱水⿰水水"),
    # wood series
    ("林", "⿰木木"), ("村", "⿰木寸"), ("松", "⿰木公"), ("柏", "⿰木白"),
    ("桂", "⿰木圭"), ("梅", "⿰木每"), ("枝", "⿰木支"), ("桐", "⿰木同"),
    ("杜", "⿰木土"), ("材", "⿰木才"), ("柱", "⿰木主"), ("株", "⿰木朱"),
    ("板", "⿰木反"), ("机", "⿰木几"), ("機", "⿰木幾"), ("树", "⿰木对"),
    ("樹", "⿰木尌"), ("尌", "⿰壴寸"), ("壴", "⿳士口一"), ("对", "⿰又寸"),
    ("样", "⿰木羊"), ("樣", "⿰木羕"), ("羕", "⿱羊永"), ("森", "⿱木林"),
    # insect series
    ("蛛", "⿰虫朱"), ("蚊", "⿰虫文"), ("蛙", "⿰虫圭"), ("蝦", "⿰虫叚"),
    ("虾", "⿰虫下"), ("蟻", "⿰虫義"), ("蚁", "⿰虫义"), ("蚜", "⿰虫牙"),
    ("蛐", "⿰虫曲"), ("蚶", "⿰虫甘"), ("蝶", "⿰虫枼"), ("枼", "⿱世木"),
    ("蜂", "⿰虫夆"), ("夆", "⿱夂丰"), ("蜻", "⿰虫青"),
    # speech series (traditional and simplified)
    ("語", "⿰言吾"), ("语", "⿰讠吾"), ("吾", "⿱五口"),
    ("請", "⿰言青"), ("请", "⿰讠青"), ("誠", "⿰言成"), ("诚", "⿰讠成"),
    ("詩", "⿰言寺"), ("诗", "⿰讠寺"), ("話", "⿰言舌"), ("话", "⿰讠舌"),
    ("記", "⿰言己"), ("记", "⿰讠己"), ("評", "⿰言平"), ("评", "⿰讠平"),
    ("訓", "⿰言川"), ("训", "⿰讠川"),
    # metal series
    ("銅", "⿰金同"), ("铜", "⿰钅同"), ("鐘", "⿰金童"), ("钟", "⿰钅中"),
    ("銀", "⿰金艮"), ("银", "⿰钅艮"), ("鈴", "⿰金令"), ("铃", "⿰钅令"),
    ("針", "⿰金十"), ("针", "⿰钅十"), ("錢", "⿰金戔"), ("戔", "⿱戈戈"),
    ("钱", "⿰钅戋"), ("釘", "⿰金丁"), ("钉", "⿰钅丁"), ("鑫", "⿱金⿰金金"),
    # shell/money series
    ("財", "⿰貝才"), ("财", "⿰贝才"), ("賄", "⿰貝有"), ("贿", "⿰贝有"),
    ("販", "⿰貝反"), ("贩", "⿰贝反"), ("賂", "⿰貝各"), ("赂", "⿰贝各"),
    ("各", "⿱夂口"),
    # mouth series
    ("吐", "⿰口土"), ("味", "⿰口未"), ("唱", "⿰口昌"), ("叫", "⿰口丩"),
    ("吹", "⿰口欠"), ("鳴", "⿰口鳥"), ("鸣", "⿰口鸟"), ("嗎", "⿰口馬"),
    ("吗", "⿰口马"), ("哇", "⿰口圭"), ("唔", "⿰口吾"), ("吳", "⿱口天"),
    ("吴", "⿱口天"), ("品", "⿱口⿰口口"),
    # sun series
    ("明", "⿰日月"), ("晴", "⿰日青"), ("時", "⿰日寺"), ("时", "⿰日寸"),
    ("曉", "⿰日堯"), ("晓", "⿰日尧"), ("堯", "⿱垚兀"), ("垚", "⿱土⿰土土"),
    ("尧", "⿱七兀"), ("早", "⿱日十"), ("昌", "⿱日日"), ("星", "⿱日生"),
    ("晶", "⿱日⿰日日"), ("申", "⿻日丨"),
    # earth series
    ("地", "⿰土也"), ("城", "⿰土成"), ("培", "⿰土咅"), ("咅", "⿱立口"),
    ("圭", "⿱土土"),
    # woman series
    ("姐", "⿰女且"), ("妹", "⿰女未"), ("媽", "⿰女馬"), ("妈", "⿰女马"),
    ("好", "⿰女子"), ("妙", "⿰女少"),
    # heart series
    ("性", "⿰忄生"), ("情", "⿰忄青"), ("快", "⿰忄夬"), ("怕", "⿰忄白"),
    ("恨", "⿰忄艮"), ("想", "⿱相心"), ("意", "⿱音心"), ("志", "⿱士心"),
    ("忠", "⿱中心"), ("思", "⿱田心"), ("音", "⿱立日"),
    # hand series
    ("打", "⿰扌丁"), ("扶", "⿰扌夫"), ("抱", "⿰扌包"), ("推", "⿰扌隹"),
    ("持", "⿰扌寺"), ("拍", "⿰扌白"),
    # fire series
    ("燈", "⿰火登"), ("登", "⿱癶豆"), ("灯", "⿰火丁"), ("煙", "⿰火垔"),
    ("垔", "⿱西土"), ("烟", "⿰火因"), ("因", "⿴囗大"), ("炒", "⿰火少"),
    ("炮", "⿰火包"), ("焱", "⿱火⿰火火"),
    # stone series
    ("砂", "⿰石少"), ("研", "⿰石开"), ("碑", "⿰石卑"), ("碼", "⿰石馬"),
    ("码", "⿰石马"), ("磊", "⿱石⿰石石"),
    # silk series
    ("紅", "⿰糸工"), ("红", "⿰纟工"), ("綠", "⿰糸彔"), ("绿", "⿰纟录"),
    ("紙", "⿰糸氏"), ("纸", "⿰纟氏"),
    # rice series
    ("粒", "⿰米立"), ("精", "⿰米青"), ("粉", "⿰米分"), ("分", "⿱八刀"),
    # animal series
    ("騎", "⿰馬奇"), ("骑", "⿰马奇"), ("奇", "⿱大可"), ("鯉", "⿰魚里"),
    ("鲤", "⿰鱼里"), ("鴨", "⿰甲鳥"), ("鸭", "⿰甲鸟"), ("鴿", "⿰合鳥"),
    ("鸽", "⿰合鸟"), ("合", "⿳人一口"), ("猪", "⿰犭者"), ("豬", "⿰豕者"),
    ("者", "⿱耂日"), ("狗", "⿰犭句"), ("句", "⿹勹口"), ("貓", "⿰豸苗"),
    ("猫", "⿰犭苗"),
    # jade series
    ("球", "⿰王求"), ("理", "⿰王里"), ("珠", "⿰王朱"), ("現", "⿰王見"),
    ("现", "⿰王见"),
    # eye series
    ("眼", "⿰目艮"), ("睛", "⿰目青"), ("盯", "⿰目丁"), ("相", "⿰木目"),
    # foot series
    ("跑", "⿰⻊包"), ("跳", "⿰⻊兆"), ("路", "⿰⻊各"), ("跟", "⿰⻊艮"),
    # food series
    ("飯", "⿰飠反"), ("饭", "⿰饣反"), ("飽", "⿰飠包"), ("饱", "⿰饣包"),
    # hill/city series
    ("陳", "⿰阝東"), ("陈", "⿰阝东"), ("院", "⿰阝完"), ("完", "⿱宀元"),
    ("元", "⿱二儿"), ("郊", "⿰交阝"), ("部", "⿰咅阝"),
    # misc phonetic series
    ("醒", "⿰酉星"), ("頭", "⿰豆頁"), ("功", "⿰工力"), ("加", "⿰力口"),
    ("架", "⿱加木"), ("朋", "⿰月月"), ("包", "⿹勹己"), ("可", "⿹丁口"),
    ("胡", "⿰古月"), ("古", "⿱十口"), ("霞", "⿱雨叚"), ("莓", "⿱艹每"),
    ("秒", "⿰禾少"), ("版", "⿰片反"),
    # grass series
    ("草", "⿱艹早"), ("花", "⿱艹化"), ("菜", "⿱艹采"), ("采", "⿱爫木"),
    ("苗", "⿱艹田"), ("芳", "⿱艹方"), ("茅", "⿱艹矛"), ("茶", "⿱艹⿱人木"),
    ("莫", "⿳艹日大"),
    # roof series
    ("家", "⿱宀豕"), ("安", "⿱宀女"), ("字", "⿱宀子"), ("室", "⿱宀至"),
    ("宴", "⿳宀日女"), ("空", "⿱穴工"), ("穴", "⿱宀八"), ("寺", "⿱土寸"),
    # weather series
    ("雲", "⿱雨云"), ("雪", "⿱雨彐"), ("電", "⿱雨电"), ("霜", "⿱雨相"),
    # field series
    ("男", "⿱田力"), ("泉", "⿱白水"),
    # gate series (full-surround family operators)
    ("聞", "⿵門耳"), ("闻", "⿵门耳"), ("問", "⿵門口"), ("问", "⿵门口"),
    ("間", "⿵門日"), ("间", "⿵门日"), ("閃", "⿵門人"), ("闪", "⿵门人"),
    ("冋", "⿵冂口"),
    # enclosure series
    ("國", "⿴囗或"), ("或", "⿹戈⿱口一"), ("国", "⿴囗玉"), ("玉", "⿻王丶"),
    ("回", "⿴囗口"), ("困", "⿴囗木"), ("園", "⿴囗袁"), ("园", "⿴囗元"),
    ("圓", "⿴囗員"), ("員", "⿱口貝"), ("圆", "⿴囗员"), ("员", "⿱口贝"),
    # open enclosures
    ("病", "⿸疒丙"), ("店", "⿸广占"), ("占", "⿱卜口"), ("庭", "⿸广廷"),
    ("廷", "⿺廴壬"), ("原", "⿸厂⿱白小"), ("匹", "⿷匚儿"), ("區", "⿷匚品"),
    ("区", "⿷匚乂"), ("凶", "⿶凵乂"),
    # ternary across
    ("街", "⿲彳圭亍"), ("衍", "⿲彳氵亍"), ("班", "⿲王刂王"),
    ("辯", "⿲辛言辛"), ("辩", "⿲辛讠辛"), ("曼", "⿳日罒又"),
    # component with a CDP entity (no codepoint of its own)
    ("青", "⿱&CDP-8BD4;月"),
]

# identity entries: atomic glyphs listed the way the real database lists them
ATOMIC = ["人", "口", "木", "水", "火", "土", "山", "石", "田", "日", "月",
          "金", "王", "米", "貝", "贝", "馬", "马", "魚", "鱼", "鳥", "鸟",
          "門", "门", "雨", "一", "丨", "云", "电", "头", "东", "東", "五",
          "七", "里", "中", "工", "力", "也", "子", "寸", "白", "目", "耳",
          "心", "女", "羊", "反", "下", "牙", "甘", "曲", "文", "朱", "義",
          "义", "成", "舌", "己", "平", "川", "同", "童", "令", "有", "才",
          "未", "欠", "先", "永", "少", "由", "台", "每", "支", "公", "主",
          "丁", "天", "言", "虫", "艹", "氵", "亅"]

READINGS = [
    ("仕", "si6"), ("位", "wai6"), ("住", "zyu6"), ("仙", "sin1"),
    ("伴", "bun6"), ("佳", "gaai1"), ("做", "zou6"), ("信", "seon3"),
    ("他", "taa1"), ("仲", "zung6"), ("仔", "zai2"), ("假", "gaa2"),
    ("伯", "baak3"), ("化", "faa3"), ("从", "cung4"), ("众", "zung3"),
    ("河", "ho4"), ("湖", "wu4"), ("海", "hoi2"), ("江", "gong1"),
    ("洋", "joeng4"), ("清", "cing1"), ("波", "bo1"), ("池", "ci4"),
    ("汁", "zap1"), ("沐", "muk6"), ("洗", "sai2"), ("泳", "wing6"),
    ("沙", "saa1"), ("油", "jau4"), ("沖", "cung1"), ("治", "zi6"),
    ("淋", "lam4"), ("酒", "zau2"), ("泡", "paau1"), ("淼", "miu5"),
    ("林", "lam4"), ("村", "cyun1"), ("松", "cung4"), ("柏", "paak3"),
    ("桂", "gwai3"), ("梅", "mui4"), ("枝", "zi1"), ("桐", "tung4"),
    ("杜", "dou6"), ("材", "coi4"), ("柱", "cyu5"), ("株", "zyu1"),
    ("板", "baan2"), ("机", "gei1"), ("機", "gei1"), ("树", "syu6"),
    ("樹", "syu6"), ("对", "deoi3"), ("样", "joeng6"), ("樣", "joeng6"),
    ("森", "sam1"), ("蛛", "zyu1"), ("蚊", "man1"), ("蛙", "waa1"),
    ("蝦", "haa1"), ("虾", "haa1"), ("蟻", "ngai5"), ("蚁", "ngai5"),
    ("蚜", "ngaa4"), ("蛐", "kuk1"), ("蚶", "ham1"), ("蝶", "dip6"),
    ("蜂", "fung1"), ("蜻", "cing1"), ("語", "jyu5"), ("语", "jyu5"),
    ("吾", "ng4"), ("請", "cing2 ceng2"), ("请", "cing2 ceng2"),
    ("誠", "sing4"), ("诚", "sing4"), ("詩", "si1"), ("诗", "si1"),
    ("話", "waa6"), ("话", "waa6"), ("記", "gei3"), ("记", "gei3"),
    ("評", "ping4"), ("评", "ping4"), ("訓", "fan3"), ("训", "fan3"),
    ("銅", "tung4"), ("铜", "tung4"), ("鐘", "zung1"), ("钟", "zung1"),
    ("銀", "ngan4"), ("银", "ngan4"), ("鈴", "ling4"), ("铃", "ling4"),
    ("針", "zam1"), ("针", "zam1"), ("錢", "cin4"), ("钱", "cin4"),
    ("釘", "ding1"), ("钉", "ding1"), ("鑫", "jam1"), ("財", "coi4"),
    ("财", "coi4"), ("賄", "fui3"), ("贿", "fui3"), ("販", "faan3"),
    ("贩", "faan3"), ("賂", "lou6"), ("赂", "lou6"), ("吐", "tou3"),
    ("味", "mei6"), ("唱", "coeng3"), ("叫", "giu3"), ("吹", "ceoi1"),
    ("鳴", "ming4"), ("鸣", "ming4"), ("嗎", "maa1"), ("吗", "maa1"),
    ("哇", "waa1"), ("唔", "m4"), ("吳", "ng4"), ("吴", "ng4"),
    ("品", "ban2"), ("明", "ming4"), ("晴", "cing4"), ("時", "si4"),
    ("时", "si4"), ("曉", "hiu2"), ("晓", "hiu2"), ("早", "zou2"),
    ("昌", "coeng1"), ("星", "sing1"), ("晶", "zing1"), ("申", "san1"),
    ("地", "dei6"), ("城", "sing4"), ("培", "pui4"), ("圭", "gwai1"),
    ("姐", "ze2"), ("妹", "mui6"), ("媽", "maa1"), ("妈", "maa1"),
    ("好", "hou2"), ("妙", "miu6"), ("性", "sing3"), ("情", "cing4"),
    ("快", "faai3"), ("怕", "paa3"), ("恨", "han6"), ("想", "soeng2"),
    ("意", "ji3"), ("志", "zi3"), ("忠", "zung1"), ("思", "si1"),
    ("音", "jam1"), ("打", "daa2"), ("扶", "fu4"), ("抱", "pou5"),
    ("推", "teoi1"), ("持", "ci4"), ("拍", "paak3"), ("燈", "dang1"),
    ("登", "dang1"), ("灯", "dang1"), ("煙", "jin1"), ("烟", "jin1"),
    ("炒", "caau2"), ("炮", "paau3"), ("焱", "jim6"), ("砂", "saa1"),
    ("研", "jin4"), ("碑", "bei1"), ("碼", "maa5"), ("码", "maa5"),
    ("磊", "leoi5"), ("紅", "hung4"), ("红", "hung4"), ("綠", "luk6"),
    ("绿", "luk6"), ("紙", "zi2"), ("纸", "zi2"), ("粒", "nap1"),
    ("精", "zing1"), ("粉", "fan2"), ("分", "fan1"), ("騎", "ke4"),
    ("骑", "ke4"), ("奇", "kei4"), ("鯉", "lei5"), ("鲤", "lei5"),
    ("鴨", "aap3"), ("鸭", "aap3"), ("鴿", "gap3"), ("鸽", "gap3"),
    ("合", "hap6"), ("猪", "zyu1"), ("豬", "zyu1"), ("者", "ze2"),
    ("狗", "gau2"), ("句", "geoi3"), ("貓", "maau1"), ("猫", "maau1"),
    ("球", "kau4"), ("理", "lei5"), ("珠", "zyu1"), ("現", "jin6"),
    ("现", "jin6"), ("眼", "ngaan5"), ("睛", "zing1"), ("盯", "ding1"),
    ("相", "soeng1"), ("跑", "paau2"), ("跳", "tiu3"), ("路", "lou6"),
    ("跟", "gan1"), ("飯", "faan6"), ("饭", "faan6"), ("飽", "baau2"),
    ("饱", "baau2"), ("陳", "can4"), ("陈", "can4"), ("院", "jyun2"),
    ("完", "jyun4"), ("元", "jyun4"), ("郊", "gaau1"), ("部", "bou6"),
    ("醒", "sing2"), ("頭", "tau4"), ("头", "tau4"), ("功", "gung1"),
    ("加", "gaa1"), ("架", "gaa3"), ("朋", "pang4"), ("包", "baau1"),
    ("可", "ho2"), ("胡", "wu4"), ("古", "gu2"), ("霞", "haa4"),
    ("莓", "mui4"), ("秒", "miu5"), ("版", "baan2"), ("蒸", "zing1"),
    ("烝", "zing1"), ("丞", "sing4"), ("草", "cou2"), ("花", "faa1"),
    ("菜", "coi3"), ("采", "coi2"), ("苗", "miu4"), ("芳", "fong1"),
    ("茅", "maau4"), ("茶", "caa4"), ("莫", "mok6"), ("家", "gaa1"),
    ("安", "on1"), ("字", "zi6"), ("室", "sat1"), ("宴", "jin3"),
    ("空", "hung1"), ("穴", "jyut6"), ("寺", "zi6"), ("雲", "wan4"),
    ("云", "wan4"), ("雪", "syut3"), ("電", "din6"), ("电", "din6"),
    ("霜", "soeng1"), ("男", "naam4"), ("泉", "cyun4"), ("聞", "man4"),
    ("闻", "man4"), ("問", "man6"), ("问", "man6"), ("間", "gaan1"),
    ("间", "gaan1"), ("閃", "sim2"), ("闪", "sim2"), ("國", "gwok3"),
    ("国", "gwok3"), ("回", "wui4"), ("困", "kwan3"), ("園", "jyun4"),
    ("园", "jyun4"), ("圓", "jyun4"), ("圆", "jyun4"), ("員", "jyun4"),
    ("员", "jyun4"), ("病", "beng6 bing6"), ("店", "dim3"), ("占", "zim1"),
    ("庭", "ting4"), ("廷", "ting4"), ("原", "jyun4"), ("匹", "pat1"),
    ("區", "keoi1"), ("区", "keoi1"), ("凶", "hung1"), ("十", "sap6"),
    ("街", "gaai1"), ("衍", "jin2"), ("班", "baan1"), ("辯", "bin6"),
    ("辩", "bin6"), ("曼", "maan6"), ("青", "cing1"), ("人", "jan4"),
    ("口", "hau2"), ("木", "muk6"), ("水", "seoi2"), ("火", "fo2"),
    ("土", "tou2"), ("山", "saan1"), ("石", "sek6"), ("田", "tin4"),
    ("日", "jat6"), ("月", "jyut6"), ("金", "gam1"), ("王", "wong4"),
    ("米", "mai5"), ("一", "jat1"), ("丁", "ding1"), ("中", "zung1"),
    ("工", "gung1"), ("力", "lik6"), ("也", "jaa5"), ("子", "zi2"),
    ("寸", "cyun3"), ("白", "baak6"), ("目", "muk6"), ("耳", "ji5"),
    ("心", "sam1"), ("女", "neoi5"), ("五", "ng5"), ("羊", "joeng4"),
    ("里", "lei5"), ("反", "faan2"), ("下", "haa6"), ("牙", "ngaa4"),
    ("甘", "gam1"), ("曲", "kuk1"), ("文", "man4"), ("朱", "zyu1"),
    ("義", "ji6"), ("义", "ji6"), ("成", "sing4"), ("舌", "sit3"),
    ("己", "gei2"), ("平", "ping4"), ("川", "cyun1"), ("同", "tung4"),
    ("童", "tung4"), ("令", "ling6"), ("有", "jau5"), ("才", "coi4"),
    ("未", "mei6"), ("欠", "him3"), ("先", "sin1"), ("永", "wing5"),
    ("少", "siu2"), ("由", "jau4"), ("台", "toi4"), ("每", "mui5"),
    ("支", "zi1"), ("公", "gung1"), ("主", "zyu2"), ("東", "dung1"),
    ("东", "dung1"), ("天", "tin1"), ("吝", "leon6"),
    # characters with readings but no decomposition rule at all (UNK path)
    ("龍", "lung4"), ("龙", "lung4"), ("龜", "gwai1"),
]

# (traditional, simplified)
VARIANT_PAIRS = [
    ("語", "语"), ("請", "请"), ("誠", "诚"), ("詩", "诗"), ("話", "话"),
    ("記", "记"), ("評", "评"), ("訓", "训"), ("銅", "铜"), ("鐘", "钟"),
    ("銀", "银"), ("鈴", "铃"), ("針", "针"), ("錢", "钱"), ("釘", "钉"),
    ("財", "财"), ("賄", "贿"), ("販", "贩"), ("賂", "赂"), ("蝦", "虾"),
    ("蟻", "蚁"), ("鳴", "鸣"), ("嗎", "吗"), ("媽", "妈"), ("騎", "骑"),
    ("鯉", "鲤"), ("鴨", "鸭"), ("鴿", "鸽"), ("現", "现"), ("飯", "饭"),
    ("飽", "饱"), ("貓", "猫"), ("陳", "陈"), ("頭", "头"), ("紅", "红"),
    ("綠", "绿"), ("紙", "纸"), ("聞", "闻"), ("問", "问"), ("間", "间"),
    ("閃", "闪"), ("國", "国"), ("園", "园"), ("圓", "圆"), ("員", "员"),
    ("電", "电"), ("時", "时"), ("曉", "晓"), ("燈", "灯"), ("煙", "烟"),
    ("樹", "树"), ("樣", "样"), ("機", "机"), ("碼", "码"), ("辯", "辩"),
    ("區", "区"), ("雲", "云"), ("吳", "吴"), ("東", "东"), ("馬", "马"),
    ("魚", "鱼"), ("鳥", "鸟"), ("門", "门"), ("貝", "贝"), ("豬", "猪"),
    ("龍", "龙"), ("義", "义"),
]


def cp(ch: str) -> str:
    return f"U+{ord(ch):04X}"


def main() -> None:
    data_dir = Path(__file__).resolve().parent.parent / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    lines = [";; curated mini decomposition table (CHISE IDS layout)"]
    for ch, expr in RULES:
        lines.append(f"{cp(ch)}\t{ch}\t{expr}")
    for ch in ATOMIC:
        lines.append(f"{cp(ch)}\t{ch}\t{ch}")
    (data_dir / "mini_ids.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["# curated mini readings (UniHan kCantonese layout)"]
    for ch, reading in READINGS:
        lines.append(f"{cp(ch)}\tkCantonese\t{reading}")
    (data_dir / "mini_readings.txt").write_text("\n".join(lines) + "\n",
                                                encoding="utf-8")

    lines = ["# curated mini variants (UniHan kSimplifiedVariant/kTraditionalVariant)"]
    for trad, simp in VARIANT_PAIRS:
        lines.append(f"{cp(trad)}\tkSimplifiedVariant\t{cp(simp)}")
        lines.append(f"{cp(simp)}\tkTraditionalVariant\t{cp(trad)}")
    (data_dir / "mini_variants.txt").write_text("\n".join(lines) + "\n",
                                                encoding="utf-8")
    print(f"fixtures written to {data_dir}")


if __name__ == "__main__":
    main()
