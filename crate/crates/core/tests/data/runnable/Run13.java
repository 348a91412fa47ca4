public class Run13 {
    public static void main(String[] args) {
        int acc = 0;
        for (int j = 0; j < 16; j++) {
            acc = acc + j * 5;
        }
        System.out.println(acc);
    }
}
