package corpus;

public class Enums {
    static final class Color {
        static final Color RED = new Color("red", 0xff0000);
        static final Color GREEN = new Color("green", 0x00ff00);
        static final Color BLUE = new Color("blue", 0x0000ff);
        static final Color[] ALL = { RED, GREEN, BLUE };

        final String name;
        final int rgb;

        private Color(String name, int rgb) {
            this.name = name;
            this.rgb = rgb;
        }

        static Color parse(String s) {
            for (int i = 0; i < ALL.length; i++) {
                if (ALL[i].name.equals(s)) return ALL[i];
            }
            return null;
        }

        int red() {
            return (rgb >> 16) & 0xff;
        }
    }

    static int ordinal(Color c) {
        if (c == Color.RED) return 0;
        if (c == Color.GREEN) return 1;
        if (c == Color.BLUE) return 2;
        return -1;
    }

    static String weekday(int d) {
        switch (d) {
            case 1: return "mon";
            case 2: return "tue";
            case 3: return "wed";
            case 4: return "thu";
            case 5: return "fri";
            case 6:
            case 7: return "weekend";
            default: return "?";
        }
    }
}
